import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')
from sklearn.model_selection import train_test_split
from lightgbm import LGBMClassifier
from sklearn.impute import SimpleImputer
from sklearn.metrics import accuracy_score

df = pd.read_csv('../input/credit_risk.csv')

corr = df.corr(numeric_only=True)
print(corr['income'].sort_values())

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

df.isnull().sum()
print(df.dtypes)
df.nunique()

plt.figure(figsize=(10, 6))
sns.heatmap(df.corr(), annot=True)
plt.title('Correlation')
plt.show()

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

num_cols = [c for c in df.columns if df[c].dtype != 'object']
print(num_cols)

sns.pairplot(df.sample(100))
plt.show()

df = df.dropna(subset=['target'])
df['purpose'] = df['purpose'].fillna(df['purpose'].mode()[0])
df['housing'] = df['housing'].fillna(df['housing'].mode()[0])
df['income'] = df['income'].fillna(df['income'].median())
df['loan_amount'] = df['loan_amount'].fillna(df['loan_amount'].median())
df['age'] = df['age'].fillna(df['age'].median())
df['target'] = df['target'].map({'yes': 1, 'no': 0})

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.3, random_state=18)
print(X_train.shape, X_test.shape)

prep0 = SimpleImputer()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)

model = LGBMClassifier()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print('accuracy', accuracy_score(y_test, preds))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
