import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
from sklearn.model_selection import train_test_split
from sklearn.ensemble import RandomForestClassifier
from sklearn.preprocessing import OneHotEncoder
from sklearn.metrics import accuracy_score

df = pd.read_csv('/kaggle/input/mushrooms.csv')

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='cap_shape', data=df)
plt.xticks(rotation=45)
plt.show()

plt.figure(figsize=(10, 6))
sns.heatmap(df.corr(), annot=True)
plt.title('Correlation')
plt.show()

num_cols = [c for c in df.columns if df[c].dtype != 'object']
print(num_cols)

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

df.tail()
df.columns
print(len(df))

fig, ax = plt.subplots(1, 2, figsize=(14, 5))
df['cap_shape'].plot(kind='hist', ax=ax[0])
df.boxplot(column='cap_shape', ax=ax[1])
plt.show()

sns.pairplot(df.sample(100))
plt.show()

cat_cols = df.select_dtypes(include='object').columns
for c in cat_cols:
    print(df[c].value_counts().head())

df.isnull().sum()
print(df.dtypes)
df.nunique()

df = df.dropna(subset=['target'])
df['cap_shape'] = df['cap_shape'].fillna(df['cap_shape'].mode()[0])
df['cap_color'] = df['cap_color'].fillna(df['cap_color'].mode()[0])
df['target'] = df['target'].map({'yes': 1, 'no': 0})

X = df.drop('target', axis=1)
y = df['target']
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.25, random_state=76)
print(X_train.shape, X_test.shape)

prep0 = OneHotEncoder()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)

model = RandomForestClassifier()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print('accuracy', accuracy_score(y_test, preds))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
