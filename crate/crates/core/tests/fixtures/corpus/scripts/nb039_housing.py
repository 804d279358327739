import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')
from sklearn.model_selection import train_test_split
from sklearn.impute import SimpleImputer
from sklearn.linear_model import Lasso
from sklearn.preprocessing import PolynomialFeatures
from xgboost import XGBRegressor
from sklearn.metrics import mean_absolute_error

df = pd.read_csv('../input/housing.csv')

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

num_cols = [c for c in df.columns if df[c].dtype != 'object']
print(num_cols)

print(df.shape)
df.head()
df.info()
df.describe()

df.isnull().sum()
print(df.dtypes)
df.nunique()

fig, ax = plt.subplots(1, 2, figsize=(14, 5))
df['area'].plot(kind='hist', ax=ax[0])
df.boxplot(column='area', ax=ax[1])
plt.show()

plt.figure(figsize=(10, 6))
sns.heatmap(df.corr(), annot=True)
plt.title('Correlation')
plt.show()

df = df.dropna(subset=['target'])
df['zone'] = df['zone'].fillna(df['zone'].mode()[0])
df['area'] = df['area'].fillna(df['area'].median())
df['rooms'] = df['rooms'].fillna(df['rooms'].median())
df['age'] = df['age'].fillna(df['age'].median())

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.25, random_state=99)
print(X_train.shape, X_test.shape)

prep0 = PolynomialFeatures()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)
prep1 = SimpleImputer()
X_train = prep1.fit_transform(X_train)
X_test = prep1.transform(X_test)

model = Lasso()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print('mae', mean_absolute_error(y_test, preds))

model1 = XGBRegressor()
model1.fit(X_train, y_train)
preds = model1.predict(X_test)
print('mae', mean_absolute_error(y_test, preds))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
